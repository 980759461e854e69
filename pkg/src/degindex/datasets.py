"""Synthetic data with SIFT-like geometry for tests and benchmarks."""
import numpy as np


def make_sift_like(n_base, n_queries=0, dim=128, intrinsic_dim=16, n_clusters=64, noise=0.05,
                   seed=0):
    """Clustered vectors on a low-dimensional manifold embedded in ``dim`` dimensions.

    Latent points come from a Gaussian mixture in ``intrinsic_dim`` dimensions,
    pass through a fixed random linear map and a ReLU, and receive isotropic
    noise. Values are non-negative and scaled to roughly 0..255 like SIFT
    descriptors. Queries share the mixture with the base set but are separate
    draws.

    Returns
    -------
    base : ndarray of shape (n_base, dim), float32
    queries : ndarray of shape (n_queries, dim), float32
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=2.0, size=(n_clusters, intrinsic_dim))
    spread = rng.uniform(0.4, 1.0, size=n_clusters)
    weights = rng.dirichlet(np.full(n_clusters, 2.0))
    proj = rng.normal(size=(intrinsic_dim, dim)) / np.sqrt(intrinsic_dim)

    n = n_base + n_queries
    label = rng.choice(n_clusters, size=n, p=weights)
    z = centers[label] + rng.normal(size=(n, intrinsic_dim)) * spread[label, None]
    x = np.maximum(z @ proj, 0.0)
    x += rng.normal(scale=noise, size=x.shape)
    x = np.maximum(x, 0.0)
    x *= 255.0 / max(np.quantile(x, 0.999), 1e-12)
    x = x.astype(np.float32)
    return x[:n_base], x[n_base:]
