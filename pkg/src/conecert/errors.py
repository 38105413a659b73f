"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class ConeCertError(Exception):
    code = "ERROR"

    def __init__(self, code=None, message=""):
        if code is not None:
            self.code = code
        self.message = message
        super().__init__(f"{self.code}: {message}" if message else self.code)


class RootDataError(ConeCertError):
    pass


class AlgebraError(ConeCertError):
    pass


class OrbitError(ConeCertError):
    pass


class AnsatzError(ConeCertError):
    pass


class EvalDomainError(ConeCertError):
    code = "EVAL_DOMAIN"


class ProductError(ConeCertError):
    pass


class ReportError(ConeCertError):
    code = "BAD_REPORT"
