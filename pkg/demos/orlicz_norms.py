"""Empirical Orlicz norms against closed forms.

The exp(x^alpha) - 1 norm of a symmetric Weibull variable has the
closed form 2^(1/alpha), and an Exponential(rate) variable has psi_1
norm 2/rate.  Large samples should land near these values, and the
two-regime norm should sit inside its sandwich no matter the sample.
"""

import numpy as np

from subweibull import (
    Exponential,
    OrliczSpec,
    RngStream,
    SymmetricWeibull,
    empirical_norm,
)


def main() -> None:
    rng = RngStream(7, 0)

    print("empirical psi_alpha norms, 200000 draws each")
    for alpha in (0.5, 1.0, 2.0):
        law = SymmetricWeibull(alpha)
        x = law.sample(rng.generator(), 200_000)
        est = empirical_norm(x, OrliczSpec.psi(alpha))
        print(f"  alpha={alpha:<4} estimate={est.value:.4f} "
              f"analytic={law.psi_norm:.4f}")

    law = Exponential(1.0)
    x = law.sample(RngStream(7, 1).generator(), 200_000)
    est = empirical_norm(x, OrliczSpec.psi(1.0))
    print(f"  Exponential(1) psi_1: estimate={est.value:.4f} analytic=2.0000")

    print("\ntwo-regime norm sandwich (psi <= phi <= 2 psi), one sample")
    x = SymmetricWeibull(1.0).sample(RngStream(7, 2).generator(), 50_000)
    for scale_l in (0.5, 1.0, 2.0):
        n_psi = empirical_norm(x, OrliczSpec.gbo(1.0, scale_l)).value
        n_phi = empirical_norm(x, OrliczSpec.gbo_phi(1.0, scale_l)).value
        print(f"  L={scale_l:<4} psi={n_psi:.4f} phi={n_phi:.4f} "
              f"ratio={n_phi / n_psi:.4f}")


if __name__ == "__main__":
    main()
