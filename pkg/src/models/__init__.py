# Data models: matrices, spectra, parameters, reports
