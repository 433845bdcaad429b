"""Interactive lighting design engine: simulation, metrics, guidance.

The package is organized around one loop: edit a scene, simulate it,
measure constraint fulfillment, and generate ranked follow-up suggestions.
``service`` exposes that loop over HTTP; ``cli`` drives it headlessly.
"""

from .guidance import generate_suggestions, load_performance_table, wsm_rank
from .metrics import KINDS, FulfillmentReport, WeightConfig, evaluate
from .provenance import ProvenanceTree, load_tree, save_tree
from .scene import Edit, Scene, apply_edit, load, save, scene_from_document, scene_to_document
from .simulation import LightMap, SimSettings, simulate
from .treemap import diff_encoding, layout_treemap

__version__ = "0.1.0"

__all__ = [
    "Edit",
    "FulfillmentReport",
    "KINDS",
    "LightMap",
    "ProvenanceTree",
    "Scene",
    "SimSettings",
    "WeightConfig",
    "apply_edit",
    "diff_encoding",
    "evaluate",
    "generate_suggestions",
    "layout_treemap",
    "load",
    "load_performance_table",
    "load_tree",
    "save",
    "save_tree",
    "scene_from_document",
    "scene_to_document",
    "simulate",
    "wsm_rank",
    "__version__",
]
