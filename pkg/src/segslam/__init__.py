"""segslam - interleaved RGB-D visual SLAM and instance segmentation refinement.

Segmentation masks decide which feature points drive pose estimation, and the
estimated poses propagate and repair the masks of the following frame.
"""

__version__ = "0.1.0"
