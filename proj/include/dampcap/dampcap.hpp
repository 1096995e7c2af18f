#pragma once

#include "dampcap/capacity.hpp"
#include "dampcap/channel.hpp"
#include "dampcap/error.hpp"
#include "dampcap/families.hpp"
#include "dampcap/matrix.hpp"
#include "dampcap/numerics.hpp"
#include "dampcap/report_io.hpp"
#include "dampcap/sweep.hpp"
