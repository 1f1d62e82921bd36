#pragma once

#include <gem/analysis.hpp>
#include <gem/config.hpp>
#include <gem/core.hpp>
#include <gem/csv.hpp>
#include <gem/error.hpp>
#include <gem/experiment.hpp>
#include <gem/gamma.hpp>
#include <gem/io.hpp>
#include <gem/oracle.hpp>
#include <gem/scenario.hpp>
#include <gem/solver.hpp>
#include <gem/spectral.hpp>
