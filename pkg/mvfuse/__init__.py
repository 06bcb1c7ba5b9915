"""Occlusion aware multi view 3D human pose fusion."""

__version__ = "1.0.0"
