"""Motion-before-action: cascaded diffusion over object-pose and robot-action chunks."""

__version__ = "0.1.0"
