"""Exact pruning of binary decision trees by subtree replacement and raising."""
