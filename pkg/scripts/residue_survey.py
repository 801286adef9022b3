"""Survey of the Green function pole at s0 as the truncation radius grows.

For each radius and each base point this prints the fitted residue, the residue and constant of the
tail model's Laurent expansion, and the fitted constant term. The residue should be independent of
the point; the constant term is the regularized value and drifts slowly with the radius.

Usage: python3 scripts/residue_survey.py [R1 R2 ...]
"""

from __future__ import annotations

import sys

from thetalift import catalog
from thetalift.domain import DomainPoint, find_frame
from thetalift.green import GreenParams, pole_extrapolate

POINTS = (0.3 + 1.2j, -0.7 + 0.5j, 0.1 + 2.0j, 1.3 + 0.8j, 0.05 + 0.3j)


def main(radii: list[float]) -> None:
    lat = catalog.d1_signature_12()
    fr, one = find_frame(lat.space), lat.field.one
    print("radius,z,residue_fit,residue_laurent,constant_fit,constant_laurent")
    for radius in radii:
        params = GreenParams(s=0.5, truncation_radius=radius)
        for zc in POINTS:
            pe = pole_extrapolate(lat, 0, one, DomainPoint(fr, [zc]), params)
            print(f"{radius:g},{zc},{pe.residue:.6f},{pe.laurent_residue:.6f},"
                  f"{pe.constant_term:.6f},{pe.laurent_constant:.6f}", flush=True)


if __name__ == "__main__":
    main([float(r) for r in sys.argv[1:]] or [1e4, 2e4])
