"""
Aspect IoT - Source Package

Aspect-oriented runtime, a simulated IoT middleware built tangled or woven,
and the cohesion metrics that compare the two builds.
"""

__version__ = "1.0.0"
