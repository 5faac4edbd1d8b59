import typing as t


class DocsynthError(Exception):
    """
    Base class for every error raised by docsynth.
    """

    pass


class ConfigError(DocsynthError):
    """
    Invalid configuration. ``errors`` maps key paths to messages.
    """

    def __init__(self, errors: t.Mapping[str, t.Sequence[str]]) -> None:
        self.errors = {k: list(v) for k, v in errors.items()}
        lines = [f"{path}: {msg}" for path, msgs in self.errors.items() for msg in msgs]
        super().__init__("; ".join(lines) or "invalid configuration")


class InvalidRecordError(DocsynthError):
    """
    A record violates the record invariants.
    """

    def __init__(self, record_id: str, violations: t.Sequence[str]) -> None:
        self.record_id = record_id
        self.violations = list(violations)
        super().__init__(f"record {record_id!r}: {', '.join(self.violations)}")


class DuplicateRecordError(DocsynthError):
    """
    Two records share an id but differ in content.
    """

    def __init__(self, record_id: str) -> None:
        self.record_id = record_id
        super().__init__(f"duplicate id {record_id!r} with differing content")


class LayoutSchemaError(DocsynthError):
    """
    Layout JSON does not follow the layout schema.
    """

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


class GatewayError(DocsynthError):
    pass


class GatewayConfigError(GatewayError):
    pass


class RetriesExhaustedError(GatewayError):
    def __init__(self, attempts: int, last_status: int | None) -> None:
        self.attempts = attempts
        self.last_status = last_status
        super().__init__(
            f"gave up after {attempts} attempts (last status: {last_status})"
        )


class ReplayMissError(GatewayError):
    """
    No stored response for a request in replay mode.
    """

    def __init__(self, key: str) -> None:
        self.key = key
        super().__init__(f"no replay entry for key {key!r}")


class FenceError(DocsynthError):
    def __init__(self, message: str, snippet: str) -> None:
        self.snippet = snippet
        super().__init__(f"{message}: {snippet!r}")


class NoFenceError(FenceError):
    pass


class FenceNotValidJSONError(FenceError):
    pass


class NoTableBlockError(FenceError):
    pass


class PromptError(DocsynthError):
    pass


class ChartSpecError(DocsynthError):
    pass


class RenderError(DocsynthError):
    pass


class TaskMatrixError(DocsynthError):
    pass


class TableParseError(DocsynthError):
    pass


class OverlappingSpanError(TableParseError):
    pass


class RaggedTableError(TableParseError):
    pass


class PolicyError(DocsynthError, ValueError):
    pass


class MixPlanError(DocsynthError, ValueError):
    pass


class AugmentError(DocsynthError, ValueError):
    pass


class AlreadyAugmentedError(AugmentError):
    pass
