# Core numerics: linear algebra, q-series, quadrature, special functions, ensembles and checks
