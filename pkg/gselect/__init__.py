"""Variable selection with scaled inverse chi-square mixtures of g-priors."""
__version__ = "1.0.0"
