#pragma once

// Umbrella header for the scholarly-migration analysis library.

#include "scholmig/assignment.hpp"
#include "scholmig/binio.hpp"
#include "scholmig/clustering.hpp"
#include "scholmig/countries.hpp"
#include "scholmig/csv.hpp"
#include "scholmig/disambiguator.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/gender.hpp"
#include "scholmig/imputer.hpp"
#include "scholmig/lda.hpp"
#include "scholmig/mobility.hpp"
#include "scholmig/neural.hpp"
#include "scholmig/pipeline.hpp"
#include "scholmig/rates.hpp"
#include "scholmig/record.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/similarity.hpp"
#include "scholmig/synth.hpp"
#include "scholmig/text.hpp"
#include "scholmig/tfidf.hpp"
