"""Regenerate the bundled application profiles.

Clock frequencies come from post place-and-route results of the five
accelerators; the alpha/beta splits and rail powers are assumptions (memory-
heavier designs get a larger BRAM weight).
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dataclasses import asdict

from dualdvfs.model import AppProfile

PROFILES = {
    # name: (f_nom MHz, alpha, beta, core dyn, core stat, bram dyn, bram stat)
    "reference": (100.0, 0.20, 0.40, 9.0, 6.0, 7.5, 5.0),
    "tabla": (113.0, 0.22, 0.45, 8.5, 6.5, 7.5, 5.0),
    "dnnweaver": (99.0, 0.25, 0.55, 9.0, 6.0, 8.0, 5.0),
    "diannao": (83.0, 0.18, 0.35, 10.0, 6.0, 7.0, 5.0),
    "stripes": (40.0, 0.15, 0.30, 9.5, 6.5, 7.0, 5.0),
    "proteus": (70.0, 0.20, 0.35, 10.0, 6.0, 7.0, 5.5),
}


def main(out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (f_nom, alpha, beta, cd, cs, bd, bs) in PROFILES.items():
        prof = AppProfile.from_alpha(
            name, f_nom, alpha, beta,
            p_core_dyn0=cd, p_core_stat0=cs, p_bram_dyn0=bd, p_bram_stat0=bs,
        )
        (out_dir / f"{name}.json").write_text(json.dumps(asdict(prof), indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/dualdvfs/data/profiles")
