"""ingrepair: redundancy-based automated program repair for Petit.

Pipeline: recognize a codebase into keyed token corpora, learn term
embeddings and a recursive autoencoder to measure code similarities,
then run a generate-and-validate repair loop whose ingredient search can
be similarity-sorted and whose ingredients can be transformed by mapping
out-of-scope identifiers to in-scope identifiers from the same embedding
cluster.
"""

__version__ = "0.1.0"
