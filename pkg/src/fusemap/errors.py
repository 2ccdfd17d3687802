"""Exception types shared across the package."""


class FusemapError(Exception):
    """Base class for all package-specific errors."""


class InvalidDepthError(FusemapError, ValueError):
    """Depth value is zero or negative (zero marks a missing measurement)."""


class FrameMismatchError(FusemapError, ValueError):
    """A point or cloud arrived in a frame the operation does not accept."""


class EmptyCloudError(FusemapError, ValueError):
    """Operation requires a non-empty point cloud."""


class ContractViolationError(FusemapError, ValueError):
    """An argument is outside the range the operation is defined on."""


class UndefinedAngleError(FusemapError, ValueError):
    """View angle is undefined because the artifact sits at the robot origin."""


class PlacementError(FusemapError, RuntimeError):
    """Scene generation could not place all objects in the arena."""


class MapFormatError(FusemapError, ValueError):
    """Artifact map file is malformed or violates the schema."""


class ConfigError(FusemapError, ValueError):
    """Pipeline configuration is invalid or contains unknown keys."""


class DatasetError(FusemapError, RuntimeError):
    """Dataset directory is unreadable or structurally broken."""
