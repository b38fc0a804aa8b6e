"""loadcast: hourly load forecasting with stacked submodels and warm-start
gradient tree boosting."""

__version__ = "0.1.0"
