"""Exact k-bounded MAP inference for Markov logic networks."""
