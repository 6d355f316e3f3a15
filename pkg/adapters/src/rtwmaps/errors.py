"""Error taxonomy for the adapter layer."""


class AdapterError(Exception):
    """Base for everything raised on purpose by this package."""


class BadConfig(AdapterError):
    pass


class BadInput(AdapterError):
    """Source image missing or unreadable."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ModelUnavailable(AdapterError):
    """A backend needs a local model file that is not there.

    Nothing is ever downloaded on the caller's behalf; the message says
    which config key would supply the file.
    """

    def __init__(self, name: str, hint: str = ""):
        msg = f"model {name!r} unavailable"
        if hint:
            msg += f": {hint}"
        super().__init__(msg)
        self.name = name


class InferenceFailure(AdapterError):
    """A backend was configured and present but failed while running."""

    def __init__(self, name: str, cause: str):
        super().__init__(f"backend {name!r} failed: {cause}")
        self.name = name
        self.cause = cause
