"""
rdmnet - learn to predict representational dissimilarity matrices

A Siamese network reads two images through one shared convolutional body,
interleaves the two feature maps channel group by channel group, and
reduces them with a grouped convolution head to one predicted
dissimilarity. Around it sit a small tape-based autodiff engine, the
staged frozen/unfrozen trainer with an LR range test, and the RSA tools
used to score predictions (Spearman, noise ceilings, explained variance,
and a layer-RDM regression baseline).
"""

__version__ = "0.1.0"
__all__ = ["__version__"]
