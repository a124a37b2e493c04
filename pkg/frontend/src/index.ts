export { ApiClient, ApiRequestError, NetworkError } from "./api.js";
export type { FetchLike } from "./api.js";
export { Session, keyAction } from "./session.js";
export type {
  CategoryPanel,
  KeyAction,
  LabelChip,
  PostViewModel,
  QueuedMutation,
} from "./session.js";
export { flushUnsynced, markReviewed, toggleLabel } from "./labels.js";
export type { ToggleResult } from "./labels.js";
export { agreementView } from "./agreement.js";
export type { AgreementRow, AgreementView } from "./agreement.js";
export type * from "./types.js";
