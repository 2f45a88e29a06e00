"""sceneexport: convert upstream grounding dumps into canonical scene records."""

from .convert import ADAPTERS, build_record, export, load_dump_dir, min_distance_in_box
from .schema import ExportError, serialize_record, validate_record

__version__ = "0.1.0"
