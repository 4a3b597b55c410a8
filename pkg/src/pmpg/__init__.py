"""Perfect-information stochastic games: multi-discounted and priority mean-payoff solvers."""

__version__ = "0.1.0"
