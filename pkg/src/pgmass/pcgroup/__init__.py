from .presentation import (
    PcPresentation, PresentationError, InconsistentPresentationError, ParseError,
    CollectionLimitError, parse_pc, format_pc,
)
from .table import PcTable, CapacityError
