"""mapforge: exact GPU thread-mapping functions for dense and fractal domains,
an LLM mapping-inference harness, and block-level waste accounting."""

from mapforge.geometry import (
    Domain,
    FractalSpec,
    GroundTruth,
    MAX_INDEX,
    builtin_spec,
    fractal_map,
    generate_ground_truth,
    map_domain,
    map_pyramid,
    map_triangular,
    membership,
    oracle_enumerate,
)

__version__ = "0.1.0"
