from enum import Enum


class Verdict(str, Enum):
    CERTIFIED = "CERTIFIED"
    NUMERICALLY_SUPPORTED = "NUMERICALLY_SUPPORTED"
    INCONCLUSIVE = "INCONCLUSIVE"
    FAILED = "FAILED"

    def __str__(self):
        return self.value
