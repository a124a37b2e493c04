"""Multi-label understanding of peer-support posts against a CBT concept
catalog: classifiers, baselines, evaluation protocol, and the annotation
workflow used to build gold data."""

__version__ = "0.1.0"

from .ontology import Category, Label, LabelCatalog, catalog_load

__all__ = ["Category", "Label", "LabelCatalog", "catalog_load", "__version__"]
