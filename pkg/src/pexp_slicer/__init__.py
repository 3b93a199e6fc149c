"""Slicing probabilistic programs against pre-/post-expectation specifications."""
