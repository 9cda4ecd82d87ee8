from ._core import Config, Error, check_hypotheses, oracle_energy, run, solve

__all__ = ["Config", "Error", "check_hypotheses", "oracle_energy", "run", "solve"]
