"""roadwatch: a toolkit for building and evaluating road-incident image classifiers.

Pipeline stages: multilingual query planning, multi-source image harvesting,
duplicate removal, manifest-backed dataset assembly with stratified and
geo-stratified splits, weighted-loss CNN training, metric reporting, and
model diagnostics (class activation maps, t-SNE).
"""

__version__ = "0.1.0"
