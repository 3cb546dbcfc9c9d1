"""Regenerate golden_lorentzians.npz from the bundled mode tables.

The stored curves freeze the discrete-mode density model on the standard
2000-point window; the regression test compares fresh evaluations against
them at 1e-10 absolute.  Rerun only when the model definition itself is
deliberately changed, and say so in the commit.
"""

import os

import numpy as np

from epsim import fixtures, lorentzian_model

OMEGAS = np.linspace(2.025, 5.025, 2000)


def build() -> dict:
    out = {"omegas_ev": OMEGAS}
    for fid in fixtures.FIXTURE_IDS:
        for part in ("scattering", "total"):
            ms = fixtures.modeset_for(fid, target_part=part)
            out[f"{fid}_{part}"] = lorentzian_model(ms, OMEGAS).values
    return out


if __name__ == "__main__":
    path = os.path.join(os.path.dirname(__file__), "golden_lorentzians.npz")
    np.savez_compressed(path, **build())
    print(f"wrote {path}")
