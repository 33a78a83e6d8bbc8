# src/reviewpriv/engine/__init__.py
