#pragma once

#include "ultisim/backend.hpp"
#include "ultisim/config.hpp"
#include "ultisim/csv.hpp"
#include "ultisim/errors.hpp"
#include "ultisim/evaluation.hpp"
#include "ultisim/format.hpp"
#include "ultisim/game.hpp"
#include "ultisim/hash.hpp"
#include "ultisim/http_backend.hpp"
#include "ultisim/persona.hpp"
#include "ultisim/prompt.hpp"
#include "ultisim/replay.hpp"
#include "ultisim/run_log.hpp"
#include "ultisim/runner.hpp"
#include "ultisim/synthetic.hpp"
#include "ultisim/version.hpp"
