"""Exception types shared across the package.

Each subsystem raises these by name; the CLI maps them to exit code 1 with
the class name on stderr.
"""


class CbtnluError(Exception):
    """Base class for all package errors."""


class ParseError(CbtnluError):
    """A line of an input file could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownLabel(CbtnluError):
    """One or more label ids are not in the catalog."""

    def __init__(self, label_ids):
        ids = [label_ids] if isinstance(label_ids, str) else sorted(label_ids)
        super().__init__("unknown label(s): " + ", ".join(ids))
        self.label_ids = ids


class DuplicateId(CbtnluError):
    """A post id occurred more than once in a corpus file."""


class TooSmall(CbtnluError):
    """Dataset too small for the requested fold count."""


class NoPositives(CbtnluError):
    """A training partition has no positive example for the label."""


class NoNegatives(CbtnluError):
    """A training partition has no negative example for the label."""


class EmptyVocabulary(CbtnluError):
    """No token passed the vocabulary frequency threshold."""


class ShapeMismatch(CbtnluError):
    """Tensor operands have incompatible shapes."""


class NonFiniteGradient(CbtnluError):
    """A gradient contained NaN or infinity; the optimizer step was aborted."""

    def __init__(self, param_name: str):
        super().__init__(f"non-finite gradient in parameter '{param_name}'")
        self.param_name = param_name


class NonFiniteLoss(CbtnluError):
    """The training loss became NaN or infinite."""


class DimMismatch(CbtnluError):
    """A vector file row has the wrong number of components."""


class MissingSentenceVector(CbtnluError):
    """A file-backed sentence-vector lookup key was absent."""


class EmptyInput(CbtnluError):
    """Both text fields were empty after preprocessing."""


class EmptySequence(CbtnluError):
    """No sentences were available for the sequence model."""


class MissingPrediction(CbtnluError):
    """A gold post has no prediction."""


class DegenerateTable(CbtnluError):
    """Chance agreement is 1 while observed agreement is not; kappa undefined."""


class NoDoublyAnnotatedPosts(CbtnluError):
    """The two annotators share no annotated post."""


class UnknownPost(CbtnluError):
    """Post id not present in the store."""


class ConflictingRequest(CbtnluError):
    """A label edit both adds and removes the same label."""
