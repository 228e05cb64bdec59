"""Prestack seismic facies recognition with a convolutional autoencoder."""

from ._core import (
    ConfigError,
    FormatError,
    Model,
    RangeError,
    ShapeError,
    Survey,
    TrainingError,
    cluster_to_map,
    config_keys,
    conv2d_full,
    conv2d_valid,
    default_config,
    extract_features,
    fuzzy_cmeans,
    gradient_suite,
    kmeans,
    leaky_relu,
    load_survey,
    maxpool2x2,
    pca,
    pca_features,
    poststack_features,
    render_map,
    score_map,
    synthesize,
    train,
    unpool2x2,
    update_centroids,
)

__version__ = "0.1.0"


def run(config=None, threads=1):
    """Synthesize a survey, train, extract, cluster and score in one call."""
    config = dict(config or {})
    survey = synthesize(config)
    model, history = train(survey, config)
    features, keys = extract_features(survey, model, threads)
    labels = cluster_to_map(features, keys, config, threads)
    return {
        "survey": survey,
        "model": model,
        "loss_history": history,
        "labels": labels,
        "score": score_map(labels, survey.truth),
    }
