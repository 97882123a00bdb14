"""Applications built on the downsampler: synthetic corpus, shortest paths and PH speed-up."""
