"""Write the JSON fixtures used by the CLI examples and tests into ``fixtures/``."""

import argparse
from pathlib import Path

from shadowtrace import cw, io
from shadowtrace.bimodules import MatrixOverRing, named_ring
from shadowtrace.groups import free_abelian_group, free_group


def write(path: Path, obj):
    path.write_text(io.dumps(io.with_schema(obj), indent=2) + "\n")


def main(out: Path):
    out.mkdir(parents=True, exist_ok=True)
    write(out / "circle.json", cw.circle().to_json())
    write(out / "circle_target.json", cw.circle_target().to_json())
    for d in (-1, 0, 1, 2, 3):
        write(out / f"circle_degree{d}.json", cw.circle_map(d).to_json())

    write(out / "torus.json", cw.torus().to_json())
    write(out / "torus_target.json", cw.torus_target().to_json())
    write(out / "torus_cat.json", cw.torus_map([[2, 1], [1, 1]]).to_json())
    write(out / "torus_identity.json", cw.torus_map([[1, 0], [0, 1]]).to_json())
    write(out / "torus_grid.json", cw.torus_grid().to_json())
    write(out / "torus_grid_target.json", cw.torus_grid_target().to_json())
    write(out / "torus_grid_cat.json", cw.torus_grid_map([[2, 1], [1, 1]]).to_json())

    F = free_group(2)
    write(out / "wedge.json", cw.wedge_of_circles(2).to_json())
    write(out / "wedge_target.json", cw.GroupTarget(F, edge_labels=F.generators()).to_json())
    write(out / "wedge_shear.json", cw.CWSelfMapSpec([0], [[1, 2], [2]], []).to_json())
    write(out / "wedge_identity.json", cw.CWSelfMapSpec([0], [[1], [2]], []).to_json())

    Z2 = free_abelian_group(2, ["a", "b"])
    write(out / "fox_target_z2.json", cw.GroupTarget(Z2, images=Z2.generators()).to_json())
    write(out / "fox_target_free2.json", cw.free_target(2).to_json())

    R = named_ring("Z[Z^2]")
    write(out / "identity3_zz2.json", MatrixOverRing.identity(R, 3).to_json())
    write(out / "broken_complex.json", {
        "ring": {"kind": "integers"}, "ranks": [1, 1, 1],
        "boundaries": [[[1]], [[1]]]})
    write(out / "good_complex.json", {
        "ring": {"kind": "integers"}, "ranks": [1, 1, 1],
        "boundaries": [[[0]], [[2]]]})


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    main(Path(ap.parse_args().out))
