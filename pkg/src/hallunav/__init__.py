"""Self-supervised navigation pipeline: collect open-space motion, hallucinate
minimal obstacle sets that make the recorded motion optimal, sample consistent
LiDAR scans, train a reactive planner, and benchmark it in procedurally
generated grid worlds."""

__version__ = "0.1.0"
