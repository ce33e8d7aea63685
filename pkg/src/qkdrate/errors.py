class DomainError(ValueError):
    """An input lies outside the region where a model is defined."""


class UnknownPresetError(DomainError):
    pass
