#pragma once

#include "goldenphy/analysis.hpp"
#include "goldenphy/channel.hpp"
#include "goldenphy/common.hpp"
#include "goldenphy/dft.hpp"
#include "goldenphy/experiments.hpp"
#include "goldenphy/framing.hpp"
#include "goldenphy/io.hpp"
#include "goldenphy/modem.hpp"
#include "goldenphy/multiuser.hpp"
#include "goldenphy/primes.hpp"
#include "goldenphy/rng.hpp"
#include "goldenphy/special.hpp"
#include "goldenphy/zc.hpp"
