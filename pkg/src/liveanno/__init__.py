"""Live video annotation toolkit.

Continuous point annotation on slowed live playback, a keyframed box
baseline, budget accounting, timing/density analyses, AP@50 scoring, a
pseudo-label bridge for point-to-box teachers, and a synthetic harness
for end-to-end experiments.
"""

__version__ = "0.1.0"
