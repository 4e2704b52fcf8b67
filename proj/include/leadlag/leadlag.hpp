#pragma once

#include "leadlag/error.hpp"
#include "leadlag/rng.hpp"
#include "leadlag/fft.hpp"
#include "leadlag/wavelet_filters.hpp"
#include "leadlag/tick_series.hpp"
#include "leadlag/market_model.hpp"
#include "leadlag/crosscov.hpp"
#include "leadlag/estimators.hpp"
#include "leadlag/parallel.hpp"
#include "leadlag/montecarlo.hpp"
#include "leadlag/ingest.hpp"
#include "leadlag/report.hpp"
