"""Bundled reference candidates, one exact map_to_coordinates per domain."""

from importlib import resources

DOMAIN_IDS = (
    "triangular2d",
    "pyramid3d",
    "gasket2d",
    "carpet2d",
    "sierpinski3d",
    "menger3d",
)


def load_source(domain_id: str) -> str:
    if domain_id not in DOMAIN_IDS:
        raise KeyError(f"no reference candidate for {domain_id!r}")
    return (
        resources.files("mapforge_runner.reference")
        .joinpath(f"{domain_id}.py")
        .read_text(encoding="utf-8")
    )
