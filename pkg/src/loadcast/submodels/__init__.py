"""The four inference submodels behind one forecaster contract: fit on
training windows, map a lookback window to a 24-hour forecast in original
units."""

from .base import Forecaster, forecaster_predict
from .arima import ArimaModel, ArimaForecaster, fit_arima, arima_forecast
from .nusvr import NusvrModel, NusvrForecaster, fit_nusvr, nusvr_predict
from .elm import ElmModel, ElmForecaster, fit_elm, elm_predict
from .lstm import LstmConfig, LstmModel, LstmForecaster, fit_lstm

__all__ = [
    "Forecaster",
    "forecaster_predict",
    "ArimaModel",
    "ArimaForecaster",
    "fit_arima",
    "arima_forecast",
    "NusvrModel",
    "NusvrForecaster",
    "fit_nusvr",
    "nusvr_predict",
    "ElmModel",
    "ElmForecaster",
    "fit_elm",
    "elm_predict",
    "LstmConfig",
    "LstmModel",
    "LstmForecaster",
    "fit_lstm",
]
