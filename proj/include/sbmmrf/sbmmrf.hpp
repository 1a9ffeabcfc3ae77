#ifndef SBMMRF_SBMMRF_HPP
#define SBMMRF_SBMMRF_HPP

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/inference.hpp"
#include "sbmmrf/ingest.hpp"
#include "sbmmrf/matrix.hpp"
#include "sbmmrf/metrics.hpp"
#include "sbmmrf/network.hpp"
#include "sbmmrf/parallel.hpp"
#include "sbmmrf/random.hpp"
#include "sbmmrf/sbm.hpp"
#include "sbmmrf/simgen.hpp"
#include "sbmmrf/transform.hpp"

#endif // SBMMRF_SBMMRF_HPP
