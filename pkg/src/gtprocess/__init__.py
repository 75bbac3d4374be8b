"""Gelfand-Tsetlin patterns with atomic driving measure: regions, kernels, decay and sampling."""
