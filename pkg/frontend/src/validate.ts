/** Client-side mirror of the factor invariants. The server stays
 * authoritative; this only blocks obviously invalid submissions early. */

import type { FactorResponses, FieldErrors } from "./types.js";

export const AGE_MIN = 12;
export const AGE_MAX = 120;

export function validateFactors(factors: FactorResponses): FieldErrors {
  const errors: FieldErrors = {};
  if (!Number.isInteger(factors.age_at_arrest)) {
    errors.age_at_arrest = "age at arrest must be a whole number";
  } else if (factors.age_at_arrest < AGE_MIN || factors.age_at_arrest > AGE_MAX) {
    errors.age_at_arrest = `age at arrest must be between ${AGE_MIN} and ${AGE_MAX}`;
  }
  for (const field of ["prior_violent_convictions", "prior_fta_past_2y"] as const) {
    const value = factors[field];
    if (!Number.isInteger(value) || value < 0) {
      errors[field] = "count must be a whole number of zero or more";
    }
  }
  const conviction =
    factors.prior_misdemeanor_conviction || factors.prior_felony_conviction;
  if (factors.prior_conviction !== conviction) {
    errors.prior_conviction =
      "prior conviction must match the misdemeanor/felony responses";
  }
  if (
    factors.violent_and_20_or_younger &&
    !(factors.current_violent_offense && factors.age_at_arrest <= 20)
  ) {
    errors.violent_and_20_or_younger =
      "requires a current violent offense and age 20 or younger";
  }
  return errors;
}

export function emptyFactors(): FactorResponses {
  return {
    age_at_arrest: 30,
    current_violent_offense: false,
    violent_and_20_or_younger: false,
    pending_charge: false,
    prior_misdemeanor_conviction: false,
    prior_felony_conviction: false,
    prior_conviction: false,
    prior_violent_convictions: 0,
    prior_fta_past_2y: 0,
    prior_fta_older_2y: false,
    prior_sentence_incarceration: false,
  };
}
