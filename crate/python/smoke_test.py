"""Quick end-to-end check of the helmwave extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/python
"""

import math

import helmwave


def main():
    s = helmwave.optimal_sigma(0.8)
    assert abs(s - complex(-0.0850370, 0.0)) < 1e-6, s
    assert helmwave.auto_sigma(0.4).imag > 0.0

    thetas, values = helmwave.smoother_curve(0.5, samples=33)
    assert len(thetas) == len(values) == 33
    # High frequencies are damped; smooth ones may grow for the indefinite operator.
    assert max(v for th, v in zip(thetas, values) if abs(th) >= math.pi / 2) < 1.0

    # Two-level variant C with a large imaginary penalty converges at t = 4 but not at t = sqrt(3).
    good = helmwave.lfa_sweep(4.0, sigma=0.8j, variant="C", coarse_sigma="same", samples=65)
    bad = helmwave.lfa_sweep(math.sqrt(3.0), sigma=0.8j, variant="C", coarse_sigma="same", samples=65)
    assert good["sup"] < 1.0 < bad["sup"], (good["sup"], bad["sup"])
    three = helmwave.lfa_sweep(0.2, variant="C", levels=3, samples=17)
    assert len(three["rho"]) == 17

    indptr, indices, values = helmwave.assemble(8, 10.0, p=1, flavor="cip")
    assert len(indptr) == 9 * 9 + 1
    assert len(indices) == len(values) == indptr[-1]

    out = helmwave.solve(20.0, 16, 3, algorithm="fem_fine_cip_coarse")
    assert out["dofs"] == 65 * 65
    assert out["converged"], out["iterations"]
    assert out["history"][0] == 1.0 and out["history"][-1] < 1e-6

    try:
        helmwave.solve(20.0, 16, 2, algorithm="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown algorithm accepted")

    print(f"ok: sigma_o(0.8) = {s.real:.7f}, solve took {out['iterations']} iterations")


if __name__ == "__main__":
    main()
