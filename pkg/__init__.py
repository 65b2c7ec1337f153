"""
    init file for fairorder, a deterministic lab for fairness variance caused by weight
    initialization and data-order randomness in small neural classifiers
"""
# -*- coding: utf-8 -*-
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"
