"""
Manufactured solutions and the loads they induce.

A solution is given by a derivative profile returning value, gradient and
Hessian at points of shape (..., 2); the load ``g = -div(mu(|grad u|^2) grad u)``
follows generically from the profile and the model.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ailfem.model.problem import DomainError, NonlinearModel, default_model, linear_model

# (value, gradient (..., 2), hessian (..., 3) as xx, xy, yy)
Profile = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]

# singular factor r^a sin(b phi)
_A = -1.0 / 3.0
_B = 2.0 / 3.0


@dataclass(frozen=True)
class ManufacturedSolution:
    name: str
    profile: Profile
    model: NonlinearModel
    singular_point: tuple[float, float] | None = None

    def value(self, points: np.ndarray) -> np.ndarray:
        return self.profile(_as_points(points))[0]

    def gradient(self, points: np.ndarray) -> np.ndarray:
        points = _as_points(points)
        self._check_regular(points)
        return self.profile(points)[1]

    def hessian(self, points: np.ndarray) -> np.ndarray:
        points = _as_points(points)
        self._check_regular(points)
        return self.profile(points)[2]

    def load(self, points: np.ndarray) -> np.ndarray:
        points = _as_points(points)
        self._check_regular(points)
        _, grad, hess = self.profile(points)
        ux, uy = grad[..., 0], grad[..., 1]
        uxx, uxy, uyy = hess[..., 0], hess[..., 1], hess[..., 2]
        s = ux * ux + uy * uy
        mu = self.model.mu(s)
        mu_prime = self.model.mu_prime(s)
        return -mu * (uxx + uyy) - 2.0 * mu_prime * (
            ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy
        )

    def flux(self, points: np.ndarray) -> np.ndarray:
        return self.model.flux(self.gradient(points))

    def _check_regular(self, points: np.ndarray) -> None:
        if self.singular_point is None:
            return
        offset = points - np.asarray(self.singular_point)
        if np.any(np.sum(offset * offset, axis=-1) == 0.0):
            raise DomainError(
                f"{self.name}: derivatives are not defined at {self.singular_point}"
            )


def _as_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.shape[-1] != 2:
        raise ValueError(f"points must have a trailing dimension of 2, got {points.shape}")
    return points


def lshape_profile(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``u = x (1 - x^2)(1 - y^2) r^(-1/3) sin(2 phi / 3)`` with ``phi`` in [0, 2 pi).

    Equal to ``r^(2/3) sin(2 phi/3) (1 - r cos)(1 + r cos)(1 - r sin)(1 + r sin) cos``
    written in Cartesian form; zero at the origin.
    """
    x, y = points[..., 0], points[..., 1]
    r = np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), 2.0 * np.pi)
    origin = r == 0.0
    safe_r = np.where(origin, 1.0, r)

    cos, sin = np.cos(phi), np.sin(phi)
    sin_b, cos_b = np.sin(_B * phi), np.cos(_B * phi)
    ang_x = _A * cos * sin_b - _B * sin * cos_b
    ang_y = _A * sin * sin_b + _B * cos * cos_b
    ang_x_d = (_B * _B - _A) * sin * sin_b + _B * (_A - 1.0) * cos * cos_b
    ang_y_d = (_A - _B * _B) * cos * sin_b + _B * (_A - 1.0) * sin * cos_b

    s = safe_r**_A * sin_b
    s_x = safe_r ** (_A - 1.0) * ang_x
    s_y = safe_r ** (_A - 1.0) * ang_y
    scale = safe_r ** (_A - 2.0)
    s_xx = scale * ((_A - 1.0) * cos * ang_x - sin * ang_x_d)
    s_xy = scale * ((_A - 1.0) * sin * ang_x + cos * ang_x_d)
    s_yy = scale * ((_A - 1.0) * sin * ang_y + cos * ang_y_d)

    qx, qy = 1.0 - x * x, 1.0 - y * y
    p = x * qx * qy
    p_x = (1.0 - 3.0 * x * x) * qy
    p_y = -2.0 * y * x * qx
    p_xx = -6.0 * x * qy
    p_xy = -2.0 * y * (1.0 - 3.0 * x * x)
    p_yy = -2.0 * x * qx

    value = np.where(origin, 0.0, p * s)
    gradient = np.stack([p_x * s + p * s_x, p_y * s + p * s_y], axis=-1)
    hessian = np.stack(
        [
            p_xx * s + 2.0 * p_x * s_x + p * s_xx,
            p_xy * s + p_x * s_y + p_y * s_x + p * s_xy,
            p_yy * s + 2.0 * p_y * s_y + p * s_yy,
        ],
        axis=-1,
    )
    return value, gradient, hessian


def bubble_profile(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``u = x (1 - x) y (1 - y)`` on the unit square."""
    x, y = points[..., 0], points[..., 1]
    fx, fy = x * (1.0 - x), y * (1.0 - y)
    dx, dy = 1.0 - 2.0 * x, 1.0 - 2.0 * y
    value = fx * fy
    gradient = np.stack([dx * fy, fx * dy], axis=-1)
    hessian = np.stack([-2.0 * fy, dx * dy, -2.0 * fx], axis=-1)
    return value, gradient, hessian


def lshape_solution(model: NonlinearModel | None = None) -> ManufacturedSolution:
    return ManufacturedSolution(
        name="lshape",
        profile=lshape_profile,
        model=default_model() if model is None else model,
        singular_point=(0.0, 0.0),
    )


def square_polynomial_solution(
    model: NonlinearModel | None = None,
) -> ManufacturedSolution:
    return ManufacturedSolution(
        name="bubble",
        profile=bubble_profile,
        model=linear_model() if model is None else model,
    )


# Dirichlet energy -1/2 int |grad u|^2 of the bubble under the linear model
BUBBLE_LINEAR_ENERGY = -1.0 / 90.0

_DEFAULT: ManufacturedSolution | None = None


def _default_solution() -> ManufacturedSolution:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = lshape_solution()
    return _DEFAULT


def exact_value(point: tuple[float, float]) -> float:
    return float(_default_solution().value(np.asarray(point)))


def exact_gradient(point: tuple[float, float]) -> np.ndarray:
    return _default_solution().gradient(np.asarray(point))


def load_g(point: tuple[float, float]) -> float:
    return float(_default_solution().load(np.asarray(point)))


def polar_value(r: float, phi: float) -> float:
    """The L-shape solution in its polar form, for cross-checks."""
    c, s = math.cos(phi), math.sin(phi)
    return (
        r ** (2.0 / 3.0)
        * math.sin(2.0 * phi / 3.0)
        * (1.0 - r * c)
        * (1.0 + r * c)
        * (1.0 - r * s)
        * (1.0 + r * s)
        * c
    )
