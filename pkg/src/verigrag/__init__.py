"""Structure-aware Verilog code generation at desk scale.

Pipeline: extract data-path graphs from a Verilog subset, learn structural
graph embeddings contrastively, retrieve them from text queries through a
knowledge-distilled dual encoder, align retrieved embeddings to a frozen
language model's input space with learnable query tokens, and evaluate
generated code with pass@k.
"""

__version__ = "0.1.0"
