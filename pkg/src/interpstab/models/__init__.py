"""From-scratch binary classifiers with a scikit-learn estimator surface."""

from .additive import AdditiveModel
from .boosting import BoostedModel
from .forest import ForestModel
from .logistic import LogisticModel
from .tree import DecisionTree, Tree, build_tree

MODEL_CLASSES = {
    "logistic": LogisticModel,
    "tree": DecisionTree,
    "forest": ForestModel,
    "boosted": BoostedModel,
    "additive": AdditiveModel,
}


def make_model(name, params=None, seed=None):
    """Instantiate model ``name`` with ``params``, seeding it when it is random."""
    cls = MODEL_CLASSES[name]
    model = cls(**(params or {}))
    if "random_state" in model.get_params() and "random_state" not in (params or {}):
        model.set_params(random_state=seed)
    return model


__all__ = [
    "AdditiveModel",
    "BoostedModel",
    "DecisionTree",
    "ForestModel",
    "LogisticModel",
    "MODEL_CLASSES",
    "Tree",
    "build_tree",
    "make_model",
]
