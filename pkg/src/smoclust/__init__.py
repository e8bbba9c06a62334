"""Online learning for drifting, class-imbalanced binary data streams.

The package bundles the stream-clustering driven oversampler (SMOClust),
the classic resampling baselines it is compared against, drifting-stream
generators and the matching evaluation harnesses.
"""

from smoclust._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
