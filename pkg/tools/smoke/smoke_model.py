"""Smoke-check for the nonlinearity and the manufactured solutions."""

import math
import sys
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))


def _assert_close(actual: float, expected: float, label: str, rel: float = 1e-12) -> None:
    if not math.isclose(actual, expected, rel_tol=rel, abs_tol=1e-14):
        raise AssertionError(f"{label}: expected {expected!r}, got {actual!r}")


def _assert_raises(exc_type: type[BaseException], fn, label: str) -> None:
    try:
        fn()
    except exc_type:
        return
    raise AssertionError(f"{label}: expected {exc_type.__name__}")


def _check_models() -> None:
    from ailfem.model import default_model, linear_model, model_by_name

    model = default_model()
    _assert_close(float(model.mu(np.array(0.0))), 2.0, "mu(0)")
    _assert_close(model.m_mu, 1.0 - 2.0 * math.exp(-1.5), "m_mu")
    _assert_close(model.m_mu, 0.5537397, "m_mu value", rel=1e-7)
    _assert_close(model.nu, model.m_mu, "nu")
    _assert_close(model.L_F, 6.0, "L_F")
    _assert_close(float(model.psi(np.array(1.0))), (2.0 - math.exp(-1.0)) / 2.0, "psi(1)")
    _assert_close(float(model.psi(np.array(1.0))), 0.8160603, "psi(1) value", rel=1e-7)

    # psi' = mu / 2
    s, h = 0.7, 1e-6
    derivative = float(model.psi(np.array(s + h)) - model.psi(np.array(s - h))) / (2.0 * h)
    _assert_close(derivative, 0.5 * float(model.mu(np.array(s))), "psi derivative", rel=1e-8)

    # the flux t -> mu(t^2) t is strongly monotone with m_mu and Lipschitz with M_mu
    t = np.linspace(0.0, 6.0, 4001)
    flux = model.mu(t * t) * t
    quotients = np.diff(flux) / np.diff(t)
    if quotients.min() < model.m_mu - 1e-9 or quotients.max() > model.M_mu + 1e-9:
        raise AssertionError(
            f"flux difference quotients [{quotients.min()}, {quotients.max()}] "
            f"outside [{model.m_mu}, {model.M_mu}]"
        )

    rng = np.random.default_rng(29)
    pairs = np.sort(rng.uniform(0.0, 20.0, size=(10_000, 2)), axis=1)
    s, t = pairs[:, 0], pairs[:, 1]
    apart = t - s > 1e-6
    s, t = s[apart], t[apart]
    growth = model.mu(t * t) * t - model.mu(s * s) * s
    low, high = model.m_mu * (t - s) - 1e-9, model.M_mu * (t - s) + 1e-9
    if np.any(growth < low) or np.any(growth > high):
        raise AssertionError("flux violates its monotonicity or Lipschitz bound on a random pair")

    # mu is non-increasing with values in (1, 2]
    arguments = np.sort(rng.uniform(0.0, 20.0, size=10_000))
    values = model.mu(arguments)
    if np.any(np.diff(values) > 0.0):
        raise AssertionError("mu increases somewhere on [0, 20]")
    if values.min() <= 1.0 or values.max() > 2.0:
        raise AssertionError(f"mu leaves (1, 2]: [{values.min()}, {values.max()}]")

    # Newton linearization stays coercive
    coercivity = model.mu(arguments) + 2.0 * arguments * model.mu_prime(arguments)
    if coercivity.min() < model.m_mu - 1e-12:
        raise AssertionError(f"mu(t) + 2 t mu'(t) drops to {coercivity.min()} below m_mu")

    _assert_close(float(linear_model().mu(np.array(3.0))), 1.0, "linear mu")
    _assert_raises(ValueError, lambda: model_by_name("cubic"), "unknown model")


def _check_lshape_solution() -> None:
    from ailfem.model import (
        DomainError,
        exact_gradient,
        exact_value,
        load_g,
        lshape_solution,
        polar_value,
    )

    _assert_close(exact_value((0.0, 0.0)), 0.0, "u*(0, 0)")
    _assert_close(exact_value((1.0, 0.0)), 0.0, "u*(1, 0)")
    point = (0.5, 0.5)
    r, phi = math.hypot(*point), math.atan2(point[1], point[0])
    _assert_close(exact_value(point), polar_value(r, phi), "u*(0.5, 0.5)")
    for phi in (0.3, 2.0, 3.5, 4.6):
        p = (0.6 * math.cos(phi), 0.6 * math.sin(phi))
        _assert_close(exact_value(p), polar_value(0.6, phi), f"polar form at phi={phi}")

    h = 1e-6
    fd = np.array(
        [
            (exact_value((0.5 + h, 0.5)) - exact_value((0.5 - h, 0.5))) / (2.0 * h),
            (exact_value((0.5, 0.5 + h)) - exact_value((0.5, 0.5 - h))) / (2.0 * h),
        ]
    )
    gradient = exact_gradient(point)
    error = np.linalg.norm(gradient - fd) / np.linalg.norm(gradient)
    if error > 1e-6:
        raise AssertionError(f"gradient differs from finite differences by {error:.3e}")

    segment = np.column_stack([np.linspace(0.05, 0.95, 19), np.zeros(19)])
    solution = lshape_solution()
    if np.max(np.abs(solution.value(segment))) > 1e-15:
        raise AssertionError("u* must vanish on the slit y = 0")
    if np.max(np.abs(solution.gradient(segment)[:, 0])) > 1e-12:
        raise AssertionError("tangential derivative on y = 0 must vanish")

    direction = np.array([math.cos(0.75 * math.pi), math.sin(0.75 * math.pi)])
    near = np.linalg.norm(exact_gradient(tuple(1e-3 * direction)))
    far = np.linalg.norm(exact_gradient(tuple(1e-2 * direction)))
    _assert_close(near / far, 10.0 ** (1.0 / 3.0), "gradient growth towards the corner", rel=0.02)

    _assert_raises(DomainError, lambda: exact_gradient((0.0, 0.0)), "gradient at the origin")
    _assert_raises(DomainError, lambda: load_g((0.0, 0.0)), "load at the origin")

    # g = -div(mu(|grad u|^2) grad u) against differences of the flux
    h = 1e-5
    x, y = point

    def flux(px: float, py: float) -> np.ndarray:
        return solution.flux(np.array([px, py]))

    divergence = (flux(x + h, y)[0] - flux(x - h, y)[0]) / (2.0 * h) + (
        flux(x, y + h)[1] - flux(x, y - h)[1]
    ) / (2.0 * h)
    _assert_close(load_g(point), -float(divergence), "load against flux divergence", rel=1e-4)


def _check_bubble() -> None:
    from ailfem.model import linear_model, square_polynomial_solution

    bubble = square_polynomial_solution()
    if bubble.model.name != linear_model().name:
        raise AssertionError("bubble solution defaults to the linear model")
    points = np.array([[0.2, 0.3], [0.5, 0.5], [0.9, 0.1]])
    x, y = points[:, 0], points[:, 1]
    expected = 2.0 * (x * (1.0 - x) + y * (1.0 - y))
    if not np.allclose(bubble.load(points), expected, rtol=1e-14, atol=1e-14):
        raise AssertionError("bubble load must be -laplace(u)")


def main() -> int:
    _check_models()
    _check_lshape_solution()
    _check_bubble()
    print("smoke_model: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
