"""
Subordination Lab - Information Retrieval Under Subordination

Simulation library and experiment runner for processes time-changed by
stable and gamma subordinators.
"""

__version__ = '1.0.0'
__author__ = 'Subordination Lab Team'

# Don't import the experiment runner here to avoid circular imports
# Import it directly in app.py instead

__all__ = []
