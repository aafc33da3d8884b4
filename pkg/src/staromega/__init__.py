"""Weighted context-free languages of finite and infinite words.

Star-omega semirings, equation systems over series, Greibach normal form,
and simple reset pushdown automata with exact lasso-word evaluation.
"""

__version__ = "0.1.0"
