"""Exception types raised by the library."""


class DomainError(ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class GridTooCoarseError(ValueError):
    """A finite-difference grid has too few points."""


class EmptyBandError(ValueError):
    """No grid point falls inside a requested momentum band."""


class NonConvergenceError(RuntimeError):
    """Slice doubling did not reach the requested tolerance.

    Attributes
    ----------
    p : float
        Momentum at which convergence failed.
    previous, last : tuple of float
        The last two (T, R_left, R_right) iterates.
    slices_per_period : int
        Slicing of the last iterate.
    """

    def __init__(self, p, previous, last, slices_per_period):
        self.p = p
        self.previous = previous
        self.last = last
        self.slices_per_period = slices_per_period
        super().__init__(
            f"no convergence at p={p!r} with {slices_per_period} slices/period: "
            f"previous (T, Rl, Rr)={previous}, last={last}"
        )
