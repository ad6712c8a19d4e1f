"""Emotion-timeline editing engine.

Turns semantic edits ("happy, medium, frames 120-300") into smooth
per-frame 30-D facial expression coefficient tracks via a trainable
valence-arousal decoder, renders deterministic mesh previews, and
scores results with pixel-distance metrics.
"""

__version__ = "0.1.0"
