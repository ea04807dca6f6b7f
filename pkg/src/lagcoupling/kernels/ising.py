"""Coupled samplers for the square-lattice spin model.

The single-site Gibbs kernel sweeps the lattice in a fixed row-major order;
both lagged chains use the same order. Each site update is the two-point
maximal coupling of the Bernoulli conditionals, inlined for speed. Parallel
tempering stacks one lattice per inverse temperature and occasionally runs
a coupled swap cascade with one shared uniform per adjacent pair.
"""

from __future__ import annotations

import math

import numpy as np

from ..rng import RngStream
from ..targets import ising_energy
from .base import CoupledKernel

__all__ = ["ssg_coupled", "pt_coupled", "SingleSiteGibbsKernel", "ParallelTemperingKernel"]


def _log_uniform(rng: RngStream) -> float:
    u = rng.uniform()
    return math.log(u) if u > 0.0 else -math.inf


class SingleSiteGibbsKernel(CoupledKernel):
    def __init__(self, beta: float, lattice_n: int):
        if lattice_n < 2:
            raise ValueError(f"lattice side must be >= 2, got {lattice_n}")
        self.beta = float(beta)
        self.n = int(lattice_n)
        self.n_sites = self.n * self.n
        n = self.n
        self.neighbors = []
        for r in range(n):
            for c in range(n):
                self.neighbors.append(
                    (
                        ((r - 1) % n) * n + c,
                        ((r + 1) % n) * n + c,
                        r * n + (c - 1) % n,
                        r * n + (c + 1) % n,
                    )
                )
        # conditional P(+1 | neighbors) indexed by neighbor sum + 4
        self.p_plus = [1.0 / (1.0 + math.exp(-2.0 * self.beta * s)) for s in range(-4, 5)]
        self.descriptor = f"ssg(n={lattice_n}, beta={beta})"

    def step_single(self, rng: RngStream, spins: np.ndarray) -> np.ndarray:
        flat = spins.ravel().tolist()
        us = rng.uniforms(self.n_sites).tolist()
        table = self.p_plus
        for i, (a, b, c, d) in enumerate(self.neighbors):
            p = table[flat[a] + flat[b] + flat[c] + flat[d] + 4]
            flat[i] = 1 if us[i] < p else -1
        return np.asarray(flat, dtype=np.int8).reshape(self.n, self.n)

    def step_pair(self, rng, spins_x, spins_y):
        fx = spins_x.ravel().tolist()
        fy = spins_y.ravel().tolist()
        draws = rng.uniforms(2 * self.n_sites)
        us = draws[: self.n_sites].tolist()
        vs = draws[self.n_sites :].tolist()
        table = self.p_plus
        for i, (a, b, c, d) in enumerate(self.neighbors):
            px = table[fx[a] + fx[b] + fx[c] + fx[d] + 4]
            py = table[fy[a] + fy[b] + fy[c] + fy[d] + 4]
            overlap = 1.0 - abs(px - py)
            if us[i] < overlap:
                # common draw from the overlap distribution
                val = 1 if vs[i] * overlap < min(px, py) else -1
                fx[i] = val
                fy[i] = val
            else:
                # residuals are point masses on opposite values
                fx[i] = 1 if px > py else -1
                fy[i] = 1 if py > px else -1
        shape = (self.n, self.n)
        return (
            np.asarray(fx, dtype=np.int8).reshape(shape),
            np.asarray(fy, dtype=np.int8).reshape(shape),
        )


class ParallelTemperingKernel(CoupledKernel):
    """One lattice per temperature; swap cascade with probability omega.

    The state is the tuple of lattices; a meeting requires every
    temperature's pair to be equal.
    """

    def __init__(self, betas, omega: float, lattice_n: int):
        betas = [float(b) for b in betas]
        if len(betas) < 2 or any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be a strictly increasing sequence of length >= 2")
        if not 0.0 <= omega < 1.0:
            raise ValueError(f"omega must lie in [0, 1), got {omega}")
        self.betas = betas
        self.omega = float(omega)
        self.n_chains = len(betas)
        self.ssg = [SingleSiteGibbsKernel(b, lattice_n) for b in betas]
        self.descriptor = f"pt(chains={len(betas)}, n={lattice_n}, omega={omega})"

    def _swap_log_ratio(self, c: int, energies) -> float:
        return (self.betas[c] - self.betas[c + 1]) * (energies[c + 1] - energies[c])

    def step_single(self, rng, state):
        if rng.uniform() < self.omega:
            lats = list(state)
            energies = [ising_energy(lat) for lat in lats]
            for c in range(self.n_chains - 1):
                if _log_uniform(rng) <= self._swap_log_ratio(c, energies):
                    lats[c], lats[c + 1] = lats[c + 1], lats[c]
                    energies[c], energies[c + 1] = energies[c + 1], energies[c]
            return tuple(lats)
        return tuple(k.step_single(rng, lat) for k, lat in zip(self.ssg, state))

    def step_pair(self, rng, state_x, state_y):
        if rng.uniform() < self.omega:
            lx, ly = list(state_x), list(state_y)
            ex = [ising_energy(lat) for lat in lx]
            ey = [ising_energy(lat) for lat in ly]
            for c in range(self.n_chains - 1):
                logu = _log_uniform(rng)  # shared by the two chains
                if logu <= self._swap_log_ratio(c, ex):
                    lx[c], lx[c + 1] = lx[c + 1], lx[c]
                    ex[c], ex[c + 1] = ex[c + 1], ex[c]
                if logu <= self._swap_log_ratio(c, ey):
                    ly[c], ly[c + 1] = ly[c + 1], ly[c]
                    ey[c], ey[c + 1] = ey[c + 1], ey[c]
            return tuple(lx), tuple(ly)
        new_x = []
        new_y = []
        for kernel, lat_x, lat_y in zip(self.ssg, state_x, state_y):
            nx, ny = kernel.step_pair(rng, lat_x, lat_y)
            new_x.append(nx)
            new_y.append(ny)
        return tuple(new_x), tuple(new_y)

    def states_equal(self, state_x, state_y) -> bool:
        return all(np.array_equal(a, b) for a, b in zip(state_x, state_y))


def ssg_coupled(beta: float, lattice_n: int) -> SingleSiteGibbsKernel:
    return SingleSiteGibbsKernel(beta, lattice_n)


def pt_coupled(betas, omega: float, lattice_n: int) -> ParallelTemperingKernel:
    return ParallelTemperingKernel(betas, omega, lattice_n)
