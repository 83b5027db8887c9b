"""Smoke test for the `hida` extension module.

Builds the extension with cargo unless HIDA_LIB points at an already built
shared library, then exercises each exported entry point.

    python3 python/smoke_test.py
"""

import json
import os
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_library() -> pathlib.Path:
    env = os.environ.get("HIDA_LIB")
    if env:
        return pathlib.Path(env)
    subprocess.run(
        ["cargo", "build", "--release", "-p", "hida-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    suffix = {"darwin": "dylib", "win32": "dll"}.get(sys.platform, "so")
    prefix = "" if sys.platform == "win32" else "lib"
    return ROOT / "target" / "release" / f"{prefix}hida.{suffix}"


def load():
    lib = locate_library()
    staging = pathlib.Path(tempfile.mkdtemp())
    target = staging / ("hida.pyd" if sys.platform == "win32" else "hida.so")
    shutil.copy(lib, target)
    sys.path.insert(0, str(staging))
    import hida  # noqa: E402

    return hida


def main() -> None:
    hida = load()

    space = hida.SymbolSpace(5, 3, 1)
    assert space.level == 15
    assert space.symbol_classes == 96
    assert space.rank == 17
    assert space.cuspidal_rank() == 2
    t2 = space.hecke_matrix(2)
    assert len(t2) == 17 and all(len(row) == 17 for row in t2)

    level = hida.OrdinaryLevel(5, 3, 1)
    assert (level.cuspidal_rank, level.ordinary_rank, level.precision) == (2, 2, 20)
    duality = level.rank_duality()
    assert duality["form_rank"] == 1 and duality["duality_valuation"] == 0
    packets = level.packets()
    assert len(packets) == 1
    assert [int(a) for a in packets[0]["a_n"][:5]] == [1, -1, -1, -1, 1]

    alpha = int(hida.unit_root(-1, 1, 3))
    assert alpha % 9 == 2 and alpha % 27 == 11

    try:
        hida.SymbolSpace(1, 3, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("level 3 must be rejected")

    config = {"instances": [{"tame": 1, "prime": 11, "r_max": 1}]}
    report = hida.verify(json.dumps(config))
    assert report["passed"] and report["schema_version"] == 1
    assert hida.default_config()["precision"] == 20

    print("smoke test passed:", space, level)


if __name__ == "__main__":
    main()
