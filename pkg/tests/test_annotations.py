"""Annotation records, instance masks, validation, and the stats table."""

import json

import numpy as np
import pytest
from helpers import point_in_polygon_scalar
from hypothesis import given, settings
from hypothesis import strategies as st

from rtwsynth.annotations import (
    ADDITIVE_FIELDS,
    PARAGRAPH_PAD,
    STATS_FIELDS,
    AnnotationRecord,
    LineAnn,
    ParagraphAnn,
    StatsRow,
    StatsTable,
    Violation,
    WordAnn,
    classify_box,
    compute_stats,
    emit_mask,
    paragraph_hull,
    record_from_json,
    record_to_json,
    validate_record,
)

TRAINING_COLUMN = StatsRow(
    images=10000,
    boxes=27645,
    boxes_russian=8155,
    boxes_english=3483,
    boxes_digits=3441,
    boxes_punctuation=4217,
    lines=46479,
    words=96810,
    unique_words_cs=33504,
    unique_words_no_numbers=26804,
)


def make_record(image_id: str, texts: list[str], w: int = 100, h: int = 100):
    """One paragraph per text; one line per paragraph; square word boxes."""
    paragraphs = []
    for i, text in enumerate(texts, start=1):
        words = [
            WordAnn(
                polygon=[[10.0 + 8 * k, 10.0], [16.0 + 8 * k, 10.0],
                         [16.0 + 8 * k, 20.0], [10.0 + 8 * k, 20.0]],
                text=tok,
                chars=[
                    {
                        "polygon": [[10.0 + 8 * k + j, 10.0], [11.0 + 8 * k + j, 10.0],
                                    [11.0 + 8 * k + j, 20.0], [10.0 + 8 * k + j, 20.0]],
                        "char": c,
                    }
                    for j, c in enumerate(tok)
                ],
            )
            for k, tok in enumerate(text.split())
        ]
        line = LineAnn(
            polygon=[[8.0, 8.0], [90.0, 8.0], [90.0, 22.0], [8.0, 22.0]],
            text=text,
            words=words,
        )
        paragraphs.append(
            ParagraphAnn(
                id=i,
                polygon=[[5.0, 5.0], [95.0, 5.0], [95.0, 25.0], [5.0, 25.0]],
                text=text,
                lines=[line],
            )
        )
    return AnnotationRecord(image_id=image_id, width=w, height=h, paragraphs=paragraphs)


class TestClassifyBox:
    def test_russian_only(self):
        assert classify_box("дом") == {
            "russian": True, "english": False, "digits": False, "punctuation": False,
        }

    def test_mixed_sets_all_four(self):
        flags = classify_box("Кафе Cafe 24/7!")
        assert flags == {
            "russian": True, "english": True, "digits": True, "punctuation": True,
        }

    def test_digits_only(self):
        assert classify_box("12345") == {
            "russian": False, "english": False, "digits": True, "punctuation": False,
        }

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            classify_box("")

    def test_slash_is_not_punctuation(self):
        flags = classify_box("24/7")
        assert not flags["punctuation"]

    @given(st.text(alphabet="дмCc19.! ", min_size=1), st.text(alphabet="дмCc19.! ", min_size=1))
    @settings(max_examples=100)
    def test_concatenation_is_flag_union(self, t1, t2):
        f1, f2 = classify_box(t1), classify_box(t2)
        f12 = classify_box(t1 + t2)
        for k in f12:
            assert f12[k] == (f1[k] or f2[k])


class TestComputeStats:
    def test_empty_input_all_zero(self):
        table = compute_stats([], {})
        assert table.training == StatsRow()
        assert table.test == StatsRow()
        assert table.joint == StatsRow()

    def test_two_image_hand_count(self):
        recs = [
            make_record("a", ["дом кот"]),
            make_record("b", ["кот 5"]),
        ]
        t = compute_stats(recs, {"a": "training", "b": "training"}).training
        assert t.images == 2
        assert t.boxes == 2
        assert t.lines == 2
        assert t.words == 4
        assert t.unique_words_cs == 3  # дом, кот, 5
        assert t.unique_words_no_numbers == 2

    def test_five_record_hand_count(self):
        recs = [
            make_record("i0", ["привет мир"]),           # 2 words, russian
            make_record("i1", ["Cafe 24"]),              # english + digits
            make_record("i2", ["дом.", "улица 7"]),      # 2 paragraphs
            make_record("i3", []),                       # text-free image
            make_record("i4", ["мир"]),                  # repeats "мир"
        ]
        split = {"i0": "training", "i1": "training", "i2": "training",
                 "i3": "test", "i4": "test"}
        table = compute_stats(recs, split)
        tr, te, jt = table.training, table.test, table.joint
        assert (tr.images, te.images, jt.images) == (3, 2, 5)
        assert (tr.boxes, te.boxes, jt.boxes) == (4, 1, 5)
        assert (tr.lines, te.lines, jt.lines) == (4, 1, 5)
        assert (tr.words, te.words, jt.words) == (7, 1, 8)
        assert tr.boxes_russian == 3  # привет мир / дом. / улица 7
        assert tr.boxes_english == 1
        assert tr.boxes_digits == 2  # "Cafe 24", "улица 7"
        assert tr.boxes_punctuation == 1  # "дом."
        # unique tokens, case-sensitive: training {привет,мир,Cafe,24,дом.,улица,7}
        assert tr.unique_words_cs == 7
        assert tr.unique_words_no_numbers == 5
        assert te.unique_words_cs == 1
        assert jt.unique_words_cs == 7  # мир repeats across subsets

    def test_absent_split_defaults_to_training(self):
        recs = [make_record("x", ["дом"])]
        table = compute_stats(recs, {})
        assert table.training.images == 1
        assert table.test.images == 0

    def test_additive_fields_sum_to_joint(self):
        recs = [make_record(f"im{i}", [f"слово{i} {i}"]) for i in range(6)]
        split = {f"im{i}": ("training" if i % 2 else "test") for i in range(6)}
        table = compute_stats(recs, split)
        for f in ADDITIVE_FIELDS:
            assert getattr(table.joint, f) == getattr(table.training, f) + getattr(
                table.test, f
            ), f

    def test_unique_words_bounded_not_additive(self):
        recs = [make_record("a", ["дом кот"]), make_record("b", ["дом пёс"])]
        table = compute_stats(recs, {"a": "training", "b": "test"})
        u_tr = table.training.unique_words_cs
        u_te = table.test.unique_words_cs
        u_jt = table.joint.unique_words_cs
        assert max(u_tr, u_te) <= u_jt <= u_tr + u_te
        assert u_jt == 3  # дом shared

    def test_table_one_training_column_round_trips(self):
        table = StatsTable(training=TRAINING_COLUMN, test=StatsRow(), joint=TRAINING_COLUMN)
        again = StatsTable.from_json(table.to_json())
        assert again == table
        d = json.loads(table.to_json())
        assert set(d.keys()) == {"training", "test", "joint"}
        assert tuple(d["training"].keys()) == STATS_FIELDS
        assert d["training"]["images"] == 10000
        assert d["training"]["boxes"] == 27645
        assert d["training"]["lines"] == 46479
        assert d["training"]["words"] == 96810


class TestRecordJson:
    def test_round_trip_preserves_structure(self):
        rec = make_record("img_007", ["дом кот", "мир"])
        text = record_to_json(rec)
        back = record_from_json(text)
        assert back.image_id == "img_007"
        assert back.width == 100 and back.height == 100
        assert len(back.paragraphs) == 2
        assert back.paragraphs[0].text == "дом кот"
        assert [w.text for w in back.paragraphs[0].lines[0].words] == ["дом", "кот"]

    def test_serialization_deterministic(self):
        rec = make_record("img_001", ["привет мир"])
        assert record_to_json(rec) == record_to_json(rec)

    def test_polygons_rounded_to_two_decimals(self):
        rec = AnnotationRecord(
            image_id="r",
            width=50,
            height=50,
            paragraphs=[
                ParagraphAnn(
                    id=1,
                    polygon=[[1.23456, 2.98765], [3.0, 2.0], [3.0, 4.0], [1.0, 4.0]],
                    text="а",
                    lines=[],
                )
            ],
        )
        d = json.loads(record_to_json(rec))
        assert d["paragraphs"][0]["polygon"][0] == [1.23, 2.99]

    def test_negative_zero_never_serialized(self):
        rec = AnnotationRecord(
            image_id="z",
            width=10,
            height=10,
            paragraphs=[
                ParagraphAnn(
                    id=1,
                    polygon=[[-0.0, 0.001], [5.0, 0.0], [5.0, 5.0], [0.0, 5.0]],
                    text="а",
                    lines=[],
                )
            ],
        )
        assert "-0.0" not in record_to_json(rec)

    def test_key_order_fixed(self):
        text = record_to_json(make_record("k", ["дом"]))
        d = json.loads(text)
        assert list(d.keys()) == ["image_id", "width", "height", "paragraphs"]
        assert list(d["paragraphs"][0].keys()) == ["id", "polygon", "text", "lines"]

    def test_non_ascii_stays_readable(self):
        text = record_to_json(make_record("u", ["дом"]))
        assert "дом" in text
        assert "\\u0434" not in text


class TestParagraphHull:
    def square(self, cx, cy, r=5.0):
        return np.array(
            [[cx - r, cy - r], [cx + r, cy - r], [cx + r, cy + r], [cx - r, cy + r]]
        )

    def test_hull_contains_words_with_pad(self):
        words = [self.square(20, 20), self.square(50, 30), self.square(35, 60)]
        hull = paragraph_hull(words)
        for w in words:
            for x, y in w:
                assert point_in_polygon_scalar(x, y, hull)
        # padding: word corners are at least ~PARAGRAPH_PAD inside
        xs = hull[:, 0]
        assert xs.min() <= 20 - 5 - PARAGRAPH_PAD + 1e-9

    def test_clip_keeps_contained_words(self):
        words = [self.square(6, 6), self.square(30, 20)]
        hull = paragraph_hull(words, bounds=(40.0, 28.0))
        assert hull[:, 0].min() >= 0.0 and hull[:, 1].min() >= 0.0
        assert hull[:, 0].max() <= 40.0 and hull[:, 1].max() <= 28.0
        for w in words:
            for x, y in w:
                assert point_in_polygon_scalar(x, y, hull)

    def test_collinear_words_fall_back_to_bbox(self):
        seg = np.array([[10.0, 10.0], [20.0, 10.0], [20.0, 10.0], [10.0, 10.0]])
        hull = paragraph_hull([seg])
        assert hull.shape[0] == 4
        assert hull[:, 0].min() == 10.0 - PARAGRAPH_PAD
        assert hull[:, 1].max() == 10.0 + PARAGRAPH_PAD


class TestEmitMask:
    def test_no_placements_all_zero(self):
        mask = emit_mask([], (8, 6))
        assert mask.shape == (6, 8)
        assert mask.dtype == np.uint16
        assert mask.max() == 0

    def test_single_placement_thresholded(self):
        alpha = np.zeros((6, 8), dtype=np.float32)
        alpha[2:4, 3:6] = 0.9
        alpha[0, 0] = 0.5  # not strictly greater: stays background
        mask = emit_mask([alpha], (8, 6))
        assert np.array_equal(mask > 0, alpha > 0.5)
        assert set(np.unique(mask)) == {0, 1}

    def test_overlap_takes_later_id(self):
        a1 = np.zeros((6, 8), dtype=np.float32)
        a1[1:4, 1:5] = 1.0
        a2 = np.zeros((6, 8), dtype=np.float32)
        a2[2:5, 3:7] = 1.0
        mask = emit_mask([a1, a2], (8, 6))
        assert mask[1, 1] == 1
        assert mask[3, 3] == 2  # overlap pixel
        assert mask[4, 6] == 2

    def test_too_many_ids_rejected(self):
        alphas = [np.zeros((2, 2), dtype=np.float32)] * 65536
        with pytest.raises(ValueError):
            emit_mask(alphas, (2, 2))


class TestValidateRecord:
    def test_clean_record_passes(self):
        assert validate_record(make_record("ok", ["дом кот", "мир 7"])) == []

    def test_disallowed_character_flagged(self):
        rec = make_record("at", ["дом@кот"])
        kinds = {v.kind for v in validate_record(rec)}
        assert "DisallowedCharacter" in kinds
        assert any("'@'" in v.detail for v in validate_record(rec))

    def test_custom_charset_rules(self):
        rec = make_record("cyr", ["дом"])
        assert validate_record(rec) == []
        latin_only = set("abcdefghijklmnopqrstuvwxyz \n")
        assert any(
            v.kind == "DisallowedCharacter" for v in validate_record(rec, latin_only)
        )

    def test_paragraph_text_mismatch_flagged(self):
        rec = make_record("mm", ["дом кот"])
        bad = AnnotationRecord(
            image_id=rec.image_id,
            width=rec.width,
            height=rec.height,
            paragraphs=[
                ParagraphAnn(
                    id=1,
                    polygon=rec.paragraphs[0].polygon,
                    text="другая строка",
                    lines=rec.paragraphs[0].lines,
                )
            ],
        )
        assert any(v.kind == "TextMismatch" for v in validate_record(bad))

    def test_word_char_concat_mismatch_flagged(self):
        rec = make_record("wc", ["дом"])
        w = rec.paragraphs[0].lines[0].words[0]
        broken = WordAnn(polygon=w.polygon, text="дом", chars=w.chars[:-1])
        line = LineAnn(
            polygon=rec.paragraphs[0].lines[0].polygon, text="дом", words=[broken]
        )
        bad = AnnotationRecord(
            image_id="wc",
            width=100,
            height=100,
            paragraphs=[
                ParagraphAnn(id=1, polygon=rec.paragraphs[0].polygon, text="дом", lines=[line])
            ],
        )
        assert any(v.kind == "TextMismatch" for v in validate_record(bad))

    def test_out_of_bounds_vertex_flagged(self):
        rec = make_record("ob", ["дом"], w=20, h=15)
        assert any(v.kind == "OutOfBounds" for v in validate_record(rec))

    def test_id_gap_flagged(self):
        rec = make_record("gap", ["дом", "кот"])
        shifted = AnnotationRecord(
            image_id="gap",
            width=100,
            height=100,
            paragraphs=[
                ParagraphAnn(id=p.id + 1, polygon=p.polygon, text=p.text, lines=p.lines)
                for p in rec.paragraphs
            ],
        )
        assert any(v.kind == "IdGap" for v in validate_record(shifted))

    def test_degenerate_polygon_flagged(self):
        rec = AnnotationRecord(
            image_id="dg",
            width=50,
            height=50,
            paragraphs=[
                ParagraphAnn(
                    id=1, polygon=[[1.0, 1.0], [5.0, 1.0], [5.0, 5.0]], text="а", lines=[]
                )
            ],
        )
        assert any(v.kind == "DegeneratePolygon" for v in validate_record(rec))

    def test_violation_str_readable(self):
        v = Violation("DisallowedCharacter", "'@' in paragraph 1")
        assert str(v) == "DisallowedCharacter: '@' in paragraph 1"
