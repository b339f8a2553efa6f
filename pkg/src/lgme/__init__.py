"""Localizable genuine multimode entanglement of four-mode squeezed vacuum states."""
