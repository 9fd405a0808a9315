"""
Xtalk - crosstalk calibration toolkit for multi-pixel photon counters.
"""

__version__ = "0.1.0"
__author__ = "Your Name"

# Bumped whenever a manifest or report key changes meaning.
REPORT_FORMAT_VERSION = 1
