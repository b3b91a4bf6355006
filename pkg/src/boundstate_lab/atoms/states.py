"""Bound states and their one-body matrix elements."""

from dataclasses import dataclass

import numpy as np

from ..errors import GridTooCoarse, ValidationError
from .angular import second_moment_element, unit_vector_element
from .radial import AnalyticRadial, GridRadial, RadialGrid, solve_radial

SPECTROSCOPIC = "spdfghik"


@dataclass(frozen=True, eq=False)
class BoundState:
    """A state phi(y) = u(r)/r Y_lm of the relative coordinate."""

    n: int
    l: int
    m: int
    energy: float
    radial: object  # AnalyticRadial or GridRadial

    @property
    def mode(self):
        return self.radial.kind

    @property
    def label(self):
        letter = SPECTROSCOPIC[self.l] if self.l < len(SPECTROSCOPIC) else f"[l={self.l}]"
        return f"{self.n}{letter}{self.m:+d}" if self.l else f"{self.n}{letter}"

    def with_m(self, m):
        if abs(m) > self.l:
            raise ValidationError(f"|m| must not exceed l={self.l}")
        return BoundState(self.n, self.l, m, self.energy, self.radial)

    def node_count(self, grid=None):
        if self.mode == "grid":
            u = self.radial.samples
        else:
            grid = grid or RadialGrid(1e-6, 40 * self.n**2 * self.radial.scale / self.n, 4000)
            u = self.radial.u(grid.r)
        big = np.abs(u) > 1e-6 * np.abs(u).max()
        s = np.sign(u[big])
        return int(np.count_nonzero(s[1:] != s[:-1]))

    def mass_radius(self, fraction=0.999):
        """Radius enclosing ``fraction`` of the probability."""
        grid = self.radial.grid if self.mode == "grid" else _analytic_grid([self])
        u = self.radial.u(grid.r)
        cum = np.cumsum(u**2 * grid.weights)
        cum /= cum[-1]
        return float(np.interp(fraction, cum, grid.r))


def parse_label(text):
    """'2p' -> (2, 1); '3d' -> (3, 2)."""
    text = text.strip().lower()
    if len(text) < 2 or text[-1] not in SPECTROSCOPIC or not text[:-1].isdigit():
        raise ValidationError(f"cannot parse state label {text!r} (expected e.g. '2p')")
    n, l = int(text[:-1]), SPECTROSCOPIC.index(text[-1])
    if n < 1 or l >= n:
        raise ValidationError(f"invalid quantum numbers in {text!r}")
    return n, l


def solve_hydrogenic(model, n_max, l_max=None, mode="analytic", grid=None, tolerance=1e-4):
    """All (n, l, m) states with n <= n_max and l <= l_max.

    Parameters
    ----------
    model : AtomModel
    n_max : int
    l_max : int, optional
        Defaults to ``n_max - 1``.
    mode : {'analytic', 'grid'}
        Closed-form radial functions, or finite differences on a log grid.
    grid : RadialGrid, optional
        Grid for ``mode='grid'``; the default spans [1e-5, 200] with 4000 points.
    tolerance : float
        Largest relative deviation of a grid energy from the closed form
        before :class:`GridTooCoarse` is raised.

    Returns
    -------
    list of BoundState
        Ordered by n, then l, then m.
    """
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    l_max = n_max - 1 if l_max is None else l_max
    if not 0 <= l_max < n_max:
        raise ValidationError("need 0 <= l_max < n_max")
    if mode not in ("analytic", "grid"):
        raise ValidationError("mode must be 'analytic' or 'grid'")
    radial = {}
    for l in range(l_max + 1):
        count = n_max - l
        if mode == "analytic":
            for k in range(count):
                n = k + l + 1
                radial[n, l] = (model.energy(n), AnalyticRadial(n, l, model.mu, model.z))
        else:
            grid = grid or RadialGrid()
            energies, u = solve_radial(grid, l, model.mu, model.potential, count=count)
            for k in range(count):
                n = k + l + 1
                exact = model.energy(n)
                if abs(energies[k] - exact) > tolerance * abs(exact):
                    raise GridTooCoarse(
                        f"grid energy {energies[k]:.10g} for n={n}, l={l} deviates from "
                        f"{exact:.10g} by more than {tolerance:g} relative"
                    )
                radial[n, l] = (float(energies[k]), GridRadial(grid, u[:, k]))
    states = []
    for n in range(1, n_max + 1):
        for l in range(min(l_max, n - 1) + 1):
            energy, rad = radial[n, l]
            for m in range(-l, l + 1):
                states.append(BoundState(n, l, m, energy, rad))
    return states


def hydrogenic_state(model, label, m=0, mode="analytic", grid=None):
    n, l = parse_label(label)
    states = solve_hydrogenic(model, n, l, mode=mode, grid=grid, tolerance=np.inf)
    for s in states:
        if s.n == n and s.l == l and s.m == m:
            return s
    raise ValidationError(f"|m| must not exceed l for {label}")


# --------------------------------------------------------------------------
# radial quadrature


def _analytic_grid(states, n_points=3000):
    n_top = max(s.n for s in states)
    unit = max(s.radial.scale / s.n for s in states)  # 1/(2 mu Z)
    rmax = (40.0 + 12.0 * n_top**2) * unit
    return RadialGrid(1e-7, rmax, n_points)


def quadrature_grid(*states):
    """Common radial grid for a set of states."""
    grids = [s.radial.grid for s in states if s.mode == "grid"]
    if grids:
        if any(g != grids[0] for g in grids[1:]):
            raise ValidationError("grid states live on different radial grids")
        return grids[0]
    return _analytic_grid(states)


def radial_integral(a, b, power=1, grid=None):
    """int u_a u_b r^power dr."""
    grid = grid or quadrature_grid(a, b)
    r = grid.r
    return float(np.sum(a.radial.u(r) * b.radial.u(r) * r**power * grid.weights))


def radial_gradient_integral(a, b, grid=None):
    """Radial factor of <a|grad|b>; zero unless l_a = l_b +- 1."""
    grid = grid or quadrature_grid(a, b)
    r = grid.r
    ua, ub, dub = a.radial.u(r), b.radial.u(r), b.radial.du(r)
    if a.l == b.l + 1:
        f = dub - (b.l + 1) * ub / r
    elif a.l == b.l - 1:
        f = dub + b.l * ub / r
    else:
        return 0.0
    return float(np.sum(ua * f * grid.weights))


def position_matrix(a, b, grid=None):
    """<a| y |b> as a complex 3-vector."""
    ang = unit_vector_element(a.l, a.m, b.l, b.m)
    if not ang.any():
        return np.zeros(3, dtype=complex)
    return radial_integral(a, b, 1, grid) * ang


def dipole_matrix(a, b, model, grid=None):
    """Dipole moment d_ab = e <a|y|b> about the centre of mass.

    For opposite unit charges the prefactor is e = e1; in general it is
    e1 m2/M - e2 m1/M.
    """
    return model.dipole_charge * position_matrix(a, b, grid)


def momentum_matrix(a, b, model=None, grid=None):
    """<a| p |b> with p = -i grad_y, by differentiating the radial function."""
    ang = unit_vector_element(a.l, a.m, b.l, b.m)
    if not ang.any():
        return np.zeros(3, dtype=complex)
    return -1j * radial_gradient_integral(a, b, grid) * ang


def second_moment_matrix(a, b, grid=None):
    """<a| y_i y_j |b> as a complex 3x3 array."""
    ang = second_moment_element(a.l, a.m, b.l, b.m)
    if not ang.any():
        return np.zeros((3, 3), dtype=complex)
    return radial_integral(a, b, 2, grid) * ang


def characteristic_radius(state, model):
    """n^2/(mu Z), the shell-size estimate of the bound state."""
    return model.size(state.n)

