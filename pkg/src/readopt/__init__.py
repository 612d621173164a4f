"""Readability optimization by synonym substitution.

Scores text with five classic readability formulas, then searches for word
substitutions that move the score in the wanted direction, either for one
objective with a genetic algorithm or for a Pareto trade-off with NSGA-II.
"""

__version__ = "0.1.0"
