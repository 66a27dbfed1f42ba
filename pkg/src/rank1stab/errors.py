"""Exception types shared across the toolkit."""


class Rank1StabError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(Rank1StabError):
    pass


class NonFinite(Rank1StabError):
    """Input contains NaN or Inf."""


class NotSymmetric(Rank1StabError):
    pass


class Singular(Rank1StabError):
    """A linear solve hit a pivot below the singularity threshold."""


class SingularLyapunov(Rank1StabError):
    """Lyapunov equation has no unique solution (eigenvalue pair sums to zero);
    the matrix sits on the Hurwitz boundary."""


class JacobiNoConvergence(Rank1StabError):
    pass


class HypothesisViolated(Rank1StabError):
    """Closed-form certificate hypotheses (x nonzero, y positive) do not hold."""


class NotDiagonallyStable(Rank1StabError):
    pass


class DegenerateE(Rank1StabError):
    """Perturbation direction has (numerically) zero spectral norm."""


class SingularNetwork(Rank1StabError):
    """Tie-line graph is disconnected; equilibrium is not unique."""


class TargetInfeasible(Rank1StabError):
    """Requested setpoint change lies outside the area's regulation capacity."""


class NonUniformTau(Rank1StabError):
    """LTI sensitivity study requires equal normalized AGC time constants."""


class NonFiniteState(Rank1StabError):
    """Integration produced NaN/Inf; carries the offending time stamp."""

    def __init__(self, time: float):
        super().__init__(f"state became non-finite at t = {time:g} s")
        self.time = time


class EmptyOverlap(Rank1StabError):
    """Two traces share no common time window."""


class ConfigError(Rank1StabError):
    """Configuration document failed schema validation."""
