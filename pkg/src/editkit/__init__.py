"""Text editing as sequence tagging: phrase vocabularies, tag conversion,
realization, a perceptron tagger, metrics and a file-based pipeline."""

__version__ = "0.1.0"
