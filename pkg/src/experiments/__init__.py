"""Monte Carlo harness, experiment configuration and figure data."""
