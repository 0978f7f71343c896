"""CLI command groups."""
from .diagnostics import register as register_diagnostics
from .experiments import register as register_experiments
from .priors import register as register_priors
from .select import register as register_select

__all__ = [
    'register_select',
    'register_experiments',
    'register_diagnostics',
    'register_priors',
]
