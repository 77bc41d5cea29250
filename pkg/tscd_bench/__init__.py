"""
tscd_bench: synthetic time-series causal-discovery benchmark with assumption-violation
scenarios, classical baselines and AUROC/AUPRC scoring.
"""

__version__ = "0.3.0"
