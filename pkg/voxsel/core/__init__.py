"""Numeric kernels: embeddings, PLDA, selection criteria, DSP, losses and metrics."""
