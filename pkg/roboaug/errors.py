class RoboAugError(Exception):
    """Base class for every error raised by roboaug."""


class SchemaError(RoboAugError, ValueError):
    """On-disk layout, config value or id does not match the expected schema."""


class ValidationError(RoboAugError, ValueError):
    """Data is well-formed but violates a shape or content constraint."""


class BackendError(RoboAugError, RuntimeError):
    """A segmentation or generative backend failed."""

    def __init__(self, detail: str, endpoint: str = None, frame_index: int = None):
        self.detail = detail
        self.endpoint = endpoint
        self.frame_index = frame_index
        context = []
        if frame_index is not None:
            context.append(f"frame {frame_index}")
        if endpoint:
            context.append(f"endpoint {endpoint}")
        message = f"{detail} ({', '.join(context)})" if context else detail
        super().__init__(message)

    def at_frame(self, frame_index: int) -> "BackendError":
        """Copy of this error annotated with the index of the failing frame."""
        return type(self)(self.detail, endpoint=self.endpoint, frame_index=frame_index)


class ProtocolError(BackendError):
    """A backend answered, but the response breaks the wire contract."""


EXIT_CODES = {
    SchemaError: 2,
    ValidationError: 2,
    BackendError: 3,
    OSError: 4,
}


def exit_code_for(exc: BaseException) -> int:
    for exc_type, code in EXIT_CODES.items():
        if isinstance(exc, exc_type):
            return code
    return 1
