"""Error hierarchy: input errors exit 1 at the CLI, computation (math-level)
failures exit 2."""


class BiresError(Exception):
    pass


class InputError(BiresError):
    pass


class ComputationError(BiresError):
    pass
