"""
Price competition between ISPs when a content provider holds private
demand information.

Closed-form and iterative equilibria, collusion incentive thresholds,
side-payment bargaining and the Price of Partial Bargaining.
"""

__version__ = "1.0.0"
