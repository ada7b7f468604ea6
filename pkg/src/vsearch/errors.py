"""Exception types shared across the engine."""


class VSearchError(Exception):
    """Base class for all engine errors."""


# embedding providers
class DimensionMismatch(VSearchError):
    pass


class RemoteEmbedderUnavailable(VSearchError):
    pass


class EmptyFrameSet(VSearchError):
    pass


class NonFiniteInput(VSearchError):
    pass


# vector index
class DuplicateId(VSearchError):
    pass


class EmptyIndex(VSearchError):
    pass


class CorruptIndexFile(VSearchError):
    pass


# ingestion
class TranslationUnavailable(VSearchError):
    pass


class AlreadyIndexed(VSearchError):
    pass


class EmptyRecord(VSearchError):
    pass


class BadManifestRecord(VSearchError):
    pass


# search / agents
class EmptyCorpus(VSearchError):
    pass


class LlmUnavailable(VSearchError):
    pass


class UnknownVideoSelected(VSearchError):
    pass


class UnknownSession(VSearchError):
    pass


# tensor archives
class CorruptArchive(VSearchError):
    pass


class UnsupportedDtype(VSearchError):
    pass


class NameSetMismatch(VSearchError):
    pass


class ShapeMismatch(VSearchError):
    pass


class NonFiniteResult(VSearchError):
    pass


# evaluation
class NoRelevant(VSearchError):
    pass
