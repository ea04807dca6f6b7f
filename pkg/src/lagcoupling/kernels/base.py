"""Common interface for coupled MCMC kernels.

A coupled kernel bundles the marginal transition (used while one chain runs
ahead by the lag) and a joint transition on pairs. The joint transition
preserves both marginals and is faithful: applied to an equal pair it
returns a bitwise-equal pair, so chains that have met stay together.

States are treated as immutable: kernels return fresh objects or pass
through inputs unmodified, which makes stored trajectories safe.
"""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from ..rng import RngStream


class CoupledKernel:
    """Base class; concrete kernels implement the two transitions."""

    descriptor: str = ""
    # Kernels whose warmup seeds the lagged chain (so meeting can happen at
    # t = lag) flip this on and override init_lagged_pair.
    meeting_at_lag: bool = False

    def step_single(self, rng: RngStream, state: Any) -> Any:
        raise NotImplementedError

    def step_pair(self, rng: RngStream, state_x: Any, state_y: Any) -> tuple[Any, Any]:
        raise NotImplementedError

    def states_equal(self, state_x: Any, state_y: Any) -> bool:
        return bool(np.array_equal(state_x, state_y))

    def init_lagged_pair(
        self,
        rng: RngStream,
        pi0_sampler: Callable[[RngStream], Any],
        lag: int,
        keep_path: bool,
    ) -> tuple[Any, Any, list | None]:
        """Advance the leading chain ``lag`` steps; draw the lagged chain's start.

        Returns (x_lag, y_0, x_path) where x_path lists x_0 .. x_lag when
        requested.
        """
        x = pi0_sampler(rng)
        path = [x] if keep_path else None
        for _ in range(lag):
            x = self.step_single(rng, x)
            if keep_path:
                path.append(x)
        y = pi0_sampler(rng)
        return x, y, path
